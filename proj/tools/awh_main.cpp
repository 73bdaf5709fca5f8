#include "awh/cli.hpp"

int main(int argc, char** argv) { return awh::run(argc, argv); }
