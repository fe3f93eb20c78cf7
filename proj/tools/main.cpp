#include "pbern/cli.hpp"

int main(int argc, char** argv) { return pbern::cli::run(argc, argv); }
