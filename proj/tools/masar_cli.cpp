#include "cli_app.hpp"

int main(int argc, char** argv) { return masar::cli::run(argc, argv); }
