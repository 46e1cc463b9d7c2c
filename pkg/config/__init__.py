# Configuration package: environment settings and run/experiment schema
