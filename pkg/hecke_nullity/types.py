"""Type aliases for type hints."""

import math
from fractions import Fraction
from typing import Tuple, Union

# A Newton slope is a rational valuation or the marker for a zero root.
Slope = Union[Fraction, float]
INFINITE_SLOPE = math.inf

# 2x2 integer matrix [[a, b], [c, d]] stored as (a, b, c, d).
Matrix2 = Tuple[int, int, int, int]

# Element x + y*omega of a quadratic order, stored as (x, y).
OrderElement = Tuple[int, int]
