#include <stdio.h>

double xs[8] = {0.5, 1.5, 2.5, 3.5, 4.5, 5.5, 6.5, 7.5};
double ys[8] = {1.0, 0.75, 0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625};

int main(void) {
  int k;
  int rounds = 50;
  double acc = 0.0;
  double alpha = 0.999;
  double t;
  for (k = 0; k < rounds; k++) {
    t = xs[k & 7] * ys[(k + 3) & 7];
    acc = acc * alpha + t * t;
    ys[k & 7] = ys[k & 7] * alpha + 0.001 * t;
  }
  if (acc > 100.0) {
    acc = acc / 3.0;
  } else {
    acc = acc * 1.5 + alpha;
  }
  printf("%f %f\n", acc, ys[2]);
  return 0;
}
