/* Small-strain isotropic elasticity, props = {E, nu}. */

static double kron(int i, int j) { return i == j ? 1.0 : 0.0; }

static const int SLOT[6][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 2}};

static double stiffness(double lambda, double mu, int i, int j, int k, int l)
{
    double isym = 0.5 * (kron(i, k) * kron(j, l) + kron(i, l) * kron(j, k));
    return lambda * kron(i, j) * kron(k, l) + 2.0 * mu * isym;
}

void umat_entry(double *stress, double *statev, double *ddsdde, const double *stran,
                const double *dstran, const double *time, const double *dtime,
                const double *props, const int *nprops, const int *nstatv,
                const double *dfgrd0, const double *dfgrd1, const double *drot,
                const int *ntens, int *status)
{
    double e = props[0], nu = props[1];
    double lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    double mu = e / (2.0 * (1.0 + nu));
    double d[6][6];
    int a, b;

    (void)statev; (void)stran; (void)time; (void)dtime; (void)nprops; (void)nstatv;
    (void)dfgrd0; (void)dfgrd1; (void)drot;
    if (*ntens != 6) {
        *status = 1;
        return;
    }
    for (a = 0; a < 6; a++) {
        for (b = 0; b < 6; b++) {
            int i = SLOT[a][0], j = SLOT[a][1], k = SLOT[b][0], l = SLOT[b][1];
            double sum = stiffness(lambda, mu, i, j, k, l) + stiffness(lambda, mu, j, i, k, l);
            sum = sum + stiffness(lambda, mu, i, j, l, k);
            sum = sum + stiffness(lambda, mu, j, i, l, k);
            d[a][b] = 0.25 * sum;
            ddsdde[b * 6 + a] = d[a][b];
        }
    }
    for (a = 0; a < 6; a++) {
        double acc = d[a][0] * dstran[0];
        for (b = 1; b < 6; b++)
            acc = acc + d[a][b] * dstran[b];
        stress[a] = stress[a] + acc;
    }
    *status = 0;
}
