/* Row kernel for w = lam*z + c*i, out = w^(-s) on the principal branch.
 * Split into three passes so each loop maps onto the vector math library
 * (a fused cos/sin pass turns into sincos, which has no vector variant). */
#ifndef HAUSDORFF_PSHIFT_H
#define HAUSDORFF_PSHIFT_H
#include <math.h>

static void pshift_row(const double *restrict xr, const double *restrict xi, long n,
                       double s_re, double s_im, double c, double lam,
                       double *restrict outr, double *restrict outi,
                       double *restrict mag)
{
    long i;
    for (i = 0; i < n; i++) {
        double wr = lam * xr[i];
        double wi = lam * xi[i] + c;
        double lr = 0.5 * log(wr * wr + wi * wi);
        double th = atan2(wi, wr);
        mag[i] = exp(-(s_re * lr - s_im * th));
        outi[i] = -(s_re * th + s_im * lr);
    }
    for (i = 0; i < n; i++)
        outr[i] = mag[i] * cos(outi[i]);
    for (i = 0; i < n; i++)
        outi[i] = mag[i] * sin(outi[i]);
}
#endif
