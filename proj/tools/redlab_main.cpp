#include "redlab/cli.hpp"

int main(int argc, char** argv) { return redlab::cli::run(argc, argv); }
