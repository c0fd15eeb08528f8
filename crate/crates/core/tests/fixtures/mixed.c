#include <stdio.h>
#include <stdint.h>
/* helper coverage for the frontend */
int g = 3;
double acc[8] = {1.0, 2.0, 0.5};
unsigned long long big = 0x10ULL;

int twice(int v) {
  return v * 2;
}

double scale(double d, const double *p) {
  return d * *p;
}

int main() {
  int a = 1, b = 2;
  int32_t c = -7;
  double d = 0.25;
  int *pa = &a;
  int k;
  for (k = 0; k < 4; k++)
    a += twice(k) % 5;
  if (a > b && !(c < 0)) {
    b = -a;
  } else if (a == b) b--;
  else {
    d = d * -1.5 + (double)a / 3;
  }
  while (b < 10) {
    b = b + 1;
    acc[b & 7] += d;
  }
  do
    *pa = *pa - 1;
  while (*pa > 0);
  for (int j = 0; j < 3; ++j) {
    int t = j << 2;
    big = big + (unsigned long long)t;
  }
  d = scale(d, &acc[1]);
  fprintf(stdout, "%d %d %f %llu\n", a, b, fabs(d), big);
  putchar('\n');
  return ~g & 1;
}
