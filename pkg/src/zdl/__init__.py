"""Numerical laboratory for zeros of derivatives of the Riemann zeta function.

Modules:
    evalcore   certified evaluation of zeta^(k), normalized derivatives,
               the completed factor, and certified quotients
    argtrace   continuous argument tracking along paths, far-field anchored
               arguments, winding numbers of rectangles
    zeroscan   zero isolation and strip scans with certified disks
    countlab   counting reports, error terms, and proof-ingredient diagnostics
    zerostore  append-only persistent store of certified zero records
    cli        command-line front end (console script `zdl`)
"""

__version__ = "0.1.0"
