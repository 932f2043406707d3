/* Stress = SCALE * dstran, statev[0] counts calls seen by this state. */

#ifndef SCALE
#define SCALE 1.0
#endif

void umat_entry(double *stress, double *statev, double *ddsdde, const double *stran,
                const double *dstran, const double *time, const double *dtime,
                const double *props, const int *nprops, const int *nstatv,
                const double *dfgrd0, const double *dfgrd1, const double *drot,
                const int *ntens, int *status)
{
    int a;
    (void)stran; (void)time; (void)dtime; (void)props; (void)nprops; (void)dfgrd0;
    (void)dfgrd1; (void)drot; (void)ntens;
    for (a = 0; a < 36; a++)
        ddsdde[a] = a % 7 == 0 ? SCALE : 0.0;
    for (a = 0; a < 6; a++)
        stress[a] = SCALE * dstran[a];
    if (*nstatv > 0)
        statev[0] += 1.0;
    *status = 0;
}
