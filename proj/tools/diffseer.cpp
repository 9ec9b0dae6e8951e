#include "diffseer/cli.hpp"

int main(int argc, char** argv) { return diffseer::cli::run(argc, argv); }
