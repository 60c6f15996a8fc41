#include <cstdio>

int main() {
  std::puts("etm: command-line interface not wired up yet");
  return 2;
}
