#include "wpca/cli.hpp"

int main(int argc, char** argv) {
  return wpca::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
