#include <string>
#include <vector>

#include "mavnav/cli.hpp"

int main(int argc, char** argv) {
  return mavnav::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
