#include "deltaball/cli.hpp"

int main(int argc, char **argv) { return deltaball::cli::run(argc, argv); }
