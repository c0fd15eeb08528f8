#include <stdio.h>

int main(void) {
  int i;
  int m = 100;
  double x = 0.001;
  double u;
  double w;
  double s = 0.0;
  double one = 1.0;
  double B1 = -0.4999999999982;
  double B2 = 0.4166666664651e-1;
  double B3 = -0.1388888805755e-2;
  double B4 = 0.24801428034e-4;
  double B5 = -0.2754213324e-6;
  double B6 = 0.20189405e-8;
  for (i = 1; i <= m; i++) {
    u = (double)i * x;
    w = u * u;
    s = u * ((((((B6 * w + B5) * w + B4) * w + B3) * w + B2) * w + B1) * w + one);
    do {
      w = w * 0.5;
      s = s + w;
    } while (w > 1.0);
  }
  printf("%f\n", s);
  return 0;
}
