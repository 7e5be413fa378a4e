"""Physical constants shared across modules."""

# Rounded value; keeps the 2d/c and c/(2 K df) identities exact in tests.
SPEED_OF_LIGHT = 3e8

# Thermal noise density at 290 K.
THERMAL_NOISE_DBM_HZ = -174.0
