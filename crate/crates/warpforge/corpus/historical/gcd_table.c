#include <stdio.h>

int gcd(int a, int b) {
  int t;
  while (b != 0) {
    t = a % b;
    a = b;
    b = t;
  }
  return a;
}

int main(void) {
  int p;
  int q;
  int total = 0;
  int coprime = 0;
  for (p = 1; p < 24; p++) {
    for (q = 1; q < 24; q++) {
      total = total + gcd(p, q);
      if (gcd(p, q) == 1) {
        coprime++;
      }
    }
  }
  printf("%d %d\n", total, coprime);
  return 0;
}
