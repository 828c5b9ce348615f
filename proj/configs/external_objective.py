import sys

# Reads one point per line, writes one fitness per line (maximized).
for line in sys.stdin:
    x = [float(v) for v in line.split()]
    print(repr(-sum((v - 0.5) ** 2 for v in x)), flush=True)
