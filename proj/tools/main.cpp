#include "hierpose/cli.hpp"

int main(int argc, char** argv) { return hierpose::cli::run(argc, argv); }
