# Test cases package: one module per chem, search and harness module
