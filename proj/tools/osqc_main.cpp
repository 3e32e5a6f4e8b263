#include "osqc/cli.hpp"

int main(int argc, char** argv) { return osqc::cli::run(argc, argv); }
