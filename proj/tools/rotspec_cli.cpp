#include <string>
#include <vector>

#include "rotspec/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rotspec::cli::run(args);
}
