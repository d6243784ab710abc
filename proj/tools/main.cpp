#include <string>
#include <vector>

#include "vortmod/cli.hpp"

int main(int argc, char** argv) {
  return vortmod::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
