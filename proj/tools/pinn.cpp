#include "pinn/cli.hpp"

int main(int argc, char** argv) { return pinn::run(argc, argv); }
