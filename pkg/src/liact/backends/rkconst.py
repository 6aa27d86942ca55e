"""Dormand-Prince 5(4) tableau and step-control constants.

The compiled kernel (`liact._kernels`) hardcodes the same literals; the
backend parity test asserts both integrators produce identical output.
"""

# stage nodes
C2 = 1 / 5
C3 = 3 / 10
C4 = 4 / 5
C5 = 8 / 9

A21 = 1 / 5
A31 = 3 / 40
A32 = 9 / 40
A41 = 44 / 45
A42 = -56 / 15
A43 = 32 / 9
A51 = 19372 / 6561
A52 = -25360 / 2187
A53 = 64448 / 6561
A54 = -212 / 729
A61 = 9017 / 3168
A62 = -355 / 33
A63 = 46732 / 5247
A64 = 49 / 176
A65 = -5103 / 18656

# 5th order solution weights (stage 2 weight is zero)
B1 = 35 / 384
B3 = 500 / 1113
B4 = 125 / 192
B5 = -2187 / 6784
B6 = 11 / 84

# error weights: difference between 5th and embedded 4th order solution
E1 = 71 / 57600
E3 = -71 / 16695
E4 = 71 / 1920
E5 = -17253 / 339200
E6 = 22 / 525
E7 = -1 / 40

# dopri5-style PI step controller
SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
BETA = 0.04
EXPO1 = 0.2 - BETA * 0.75

# flow status codes
COMPLETED = 0
ESCAPED = 1
BLOWUP = 2
