#include "cli.hpp"

int main(int argc, char** argv) { return fracfield::cli::run(argc, argv); }
