"""Numerical tolerance constants shared by the code generators and tests."""

# Maximum deviation of a generated code symbol from unit modulus.
UNIT_MODULUS_TOL = 1e-12

# Out-of-phase circular autocorrelation floor, as a fraction of N.
CAZAC_FLOOR_FRAC = 1e-9

# Agreement between the direct and FFT correlation paths, fraction of N.
FAST_DIRECT_TOL_FRAC = 1e-9

# Identity tolerance for resample(x, 1.0).
RESAMPLE_IDENTITY_TOL = 1e-9
