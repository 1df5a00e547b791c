#include "disclosure/cli.hpp"

int main(int argc, char** argv) { return disclosure::cli::dispatch(argc, argv); }
