#include "cli.hpp"

int main(int argc, char** argv) { return cexgen::cli::run(argc, argv); }
