#include "spnb/cli.hpp"

int main(int argc, char** argv) { return spnb::cli::run(argc, argv); }
