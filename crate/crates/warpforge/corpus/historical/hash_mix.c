#include <stdio.h>

unsigned int table[8] = {3, 17, 29, 41, 53, 67, 79, 97};

int main(void) {
  int i;
  int n = 64;
  unsigned int h = 2166136261u;
  unsigned int c;
  int bits = 0;
  for (i = 0; i < n; i++) {
    c = table[i & 7] + (unsigned int)i;
    h = (h ^ c) * 16777619u;
    h = h ^ (h >> 13);
  }
  c = h;
  while (c != 0) {
    bits = bits + (int)(c & 1u);
    c = c >> 1;
  }
  printf("%u %d\n", h, bits);
  return 0;
}
