#include "ogp/cli.hpp"

int main(int argc, char** argv) {
  return ogp::cli::run_cli({argv + 1, argv + argc});
}
