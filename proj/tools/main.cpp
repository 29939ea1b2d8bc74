#include "dynres/cli.hpp"

int main(int argc, char** argv) { return dynres::cli::run(argc, argv); }
