#include "traject/cli.hpp"

int main(int argc, char** argv) { return traject::cli::dispatch(argc, argv); }
