#include <string>
#include <vector>

#include "lweak/cli.hpp"

int main(int argc, char **argv) {
  return lweak::cli::run(std::vector<std::string>(argv, argv + argc));
}
