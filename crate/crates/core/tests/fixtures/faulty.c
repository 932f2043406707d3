/* Fault injection: props[0] > 0 writes NaN stress, otherwise reports status 7. */

void umat_entry(double *stress, double *statev, double *ddsdde, const double *stran,
                const double *dstran, const double *time, const double *dtime,
                const double *props, const int *nprops, const int *nstatv,
                const double *dfgrd0, const double *dfgrd1, const double *drot,
                const int *ntens, int *status)
{
    int a;
    (void)statev; (void)stran; (void)dstran; (void)time; (void)dtime; (void)nprops;
    (void)nstatv; (void)dfgrd0; (void)dfgrd1; (void)drot; (void)ntens;
    for (a = 0; a < 36; a++)
        ddsdde[a] = 0.0;
    if (props[0] > 0.0) {
        stress[0] = 0.0 / 0.0;
        *status = 0;
    } else {
        *status = 7;
    }
}
