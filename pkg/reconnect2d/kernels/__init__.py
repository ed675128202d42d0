from reconnect2d.kernels.bessel import (
    KERNEL_TABLES,
    KernelCheck,
    RadialKernelTable,
    bessel_k0,
    bessel_k1,
    gbar,
    gtilde,
    gtilde_any,
    kernel_calK,
    kernel_checks,
    series_k0_k1,
)

__all__ = [
    "KERNEL_TABLES",
    "KernelCheck",
    "RadialKernelTable",
    "bessel_k0",
    "bessel_k1",
    "gbar",
    "gtilde",
    "gtilde_any",
    "kernel_calK",
    "kernel_checks",
    "series_k0_k1",
]
