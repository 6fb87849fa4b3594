#include "ecgpaper/cli/commands.hpp"

int main(int argc, char** argv) {
    return ecgpaper::cli::run(argc, argv);
}
