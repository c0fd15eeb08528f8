#include <stdio.h>

int main(void) {
  int t;
  int len = 80;
  double pos = 1.0;
  double vel = 0.0;
  double k = 0.3;
  double damp = 0.02;
  double dt = 0.1;
  double energy = 0.0;
  float peak = 0.0f;
  for (t = 0; t < len; t++) {
    vel = vel - (k * pos + damp * vel) * dt;
    pos = pos + vel * dt;
    energy = 0.5 * vel * vel + 0.5 * k * pos * pos;
    if (pos > peak) {
      peak = (float)pos;
    }
  }
  printf("%f %f %f\n", pos, energy, peak);
  return 0;
}
