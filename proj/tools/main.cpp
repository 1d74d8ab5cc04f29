#include "cli.hpp"

int main(int argc, char** argv)
{
    return dielsphere::cli::run(argc, argv);
}
