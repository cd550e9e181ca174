"""Independent reference computations shared by the tests."""
import math


def closed_form_overlap(h1, h2, d):
    """Sphere fraction of the intersection of two caps (spherical lens formula)."""
    p1, p2 = (1 - math.cos(h1)) / 2, (1 - math.cos(h2)) / 2
    if d >= h1 + h2:
        return 0.0
    if d <= abs(h1 - h2):
        return min(p1, p2)
    if d >= 2 * math.pi - h1 - h2:
        return p1 + p2 - 1
    ac = lambda x: math.acos(min(1.0, max(-1.0, x)))
    area = 2 * (
        math.pi
        - ac((math.cos(d) - math.cos(h1) * math.cos(h2)) / (math.sin(h1) * math.sin(h2)))
        - ac((math.cos(h2) - math.cos(d) * math.cos(h1)) / (math.sin(d) * math.sin(h1))) * math.cos(h1)
        - ac((math.cos(h1) - math.cos(d) * math.cos(h2)) / (math.sin(d) * math.sin(h2))) * math.cos(h2)
    )
    return area / (4 * math.pi)
