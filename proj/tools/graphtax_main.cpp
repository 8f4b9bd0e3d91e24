#include <string>
#include <vector>

#include "graphtax/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return graphtax::cli_main(args);
}
