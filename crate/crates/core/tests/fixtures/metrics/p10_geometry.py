import math


def area(points):
    """Shoelace formula."""
    total = 0
    for i in range(len(points)):
        x1, y1 = points[i]
        x2, y2 = points[(i + 1) % len(points)]
        total += x1 * y2 - x2 * y1
    return abs(total) / 2


def perimeter(points):
    return sum(math.hypot(points[i][0] - points[i - 1][0], points[i][1] - points[i - 1][1])
               for i in range(len(points)))


def classify(points):
    if len(points) < 3 or area(points) == 0:
        return "degenerate"
    ratio = area(points) / (perimeter(points) ** 2)
    return "round" if ratio > 0.07 else "thin"


pts = [tuple(map(float, input().split())) for _ in range(int(input()))]
print(classify(pts), f"{area(pts):.2f}", not pts)
