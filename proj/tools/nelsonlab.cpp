#include <cstdio>

int main() {
    std::puts("nelsonlab scaffold");
    return 0;
}
