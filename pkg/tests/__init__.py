# Tests package: shared fixtures for molecule, registry and run suites
