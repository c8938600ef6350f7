#include "ggmm/cli.hpp"

int main(int argc, char** argv) { return ggmm::cli::run(argc, argv); }
