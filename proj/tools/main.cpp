#include <vector>

#include "formctl/cli.hpp"

int main(int argc, char** argv) {
  return formctl::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
