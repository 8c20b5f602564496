#include "hacfem/cli.hpp"

int main(int argc, char** argv) {
    return hacfem::cli_main(argc, argv);
}
