#include <stdio.h>
#include <math.h>

double refine(double r, double v) {
  return 0.5 * (r + v / r);
}

int main(void) {
  int n;
  int steps = 12;
  double v = 2.0;
  double r = 1.0;
  double err = 1.0;
  double sum = 0.0;
  for (n = 0; n < steps; n++) {
    r = refine(r, v);
    err = fabs(r * r - v);
    sum = sum + err * 0.5;
  }
  while (err > 1e-12 && steps < 40) {
    r = refine(r, v);
    err = fabs(r * r - v);
    steps++;
  }
  printf("%.9f %g %d\n", r, sum, steps);
  return 0;
}
