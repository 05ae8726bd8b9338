#include <gce/harness.hpp>

#include <vector>

int main(int argc, char** argv) {
  return gce::cli_main(std::vector<std::string>(argv + 1, argv + argc));
}
