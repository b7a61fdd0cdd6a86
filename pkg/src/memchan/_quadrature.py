import warnings

from scipy import integrate

from .errors import QuadratureError


def checked_quad(f, a, b, *, points=None, epsabs=1e-10, epsrel=1e-12, limit=200, what="quad"):
    """scipy quad that raises QuadratureError instead of warning."""
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(
                f, a, b, points=points or None, epsabs=epsabs, epsrel=epsrel, limit=limit
            )
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"{what}: {str(exc).strip()}") from None
    if err > max(epsabs, epsrel * abs(val)) * 10:
        raise QuadratureError(f"{what} missed its tolerance", err)
    return val
