import sys

data = sys.stdin.read().split()
n, q = int(data[0]), int(data[1])
arr = sorted(int(x) for x in data[2:2 + n])
out = []
for t in data[2 + n:2 + n + q]:
    target = int(t)
    lo, hi = 0, n
    while lo < hi:
        mid = (lo + hi) // 2
        if arr[mid] < target:
            lo = mid + 1
        else:
            hi = mid
    found = lo < n and arr[lo] == target
    out.append("YES" if found else "NO")
else:
    out.append("done")
print("\n".join(out))
