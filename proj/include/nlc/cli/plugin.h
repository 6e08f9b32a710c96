/* C interface for ODE plugins loaded by `nlc decompose --plugin lib.so`.
 *
 * Required:
 *   int  nlc_ode_dim(void);                              state dimension n >= 2
 *   void nlc_ode_drift(const double* x, double* dxdt);   n values in, n values out
 * Optional:
 *   void nlc_ode_jacobian(const double* x, double* jac); n*n values, row-major
 *   void nlc_ode_initial(double* x);                     starting guess for the cycle search
 *   void nlc_ode_configure(const double* params, int count);  values of --plugin-param
 */
#ifndef NLC_CLI_PLUGIN_H
#define NLC_CLI_PLUGIN_H

#ifdef __cplusplus
extern "C" {
#endif

typedef int (*nlc_ode_dim_fn)(void);
typedef void (*nlc_ode_drift_fn)(const double* x, double* dxdt);
typedef void (*nlc_ode_jacobian_fn)(const double* x, double* jac);
typedef void (*nlc_ode_initial_fn)(double* x);
typedef void (*nlc_ode_configure_fn)(const double* params, int count);

#ifdef __cplusplus
}
#endif

#endif
