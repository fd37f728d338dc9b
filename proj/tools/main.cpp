#include "shapes2toon/cli.hpp"

int main(int argc, char** argv) { return s2t::cli::run(argc, argv); }
