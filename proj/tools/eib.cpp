#include "cli.hpp"

int main(int argc, char** argv) { return eib::cli::run(argc, argv); }
