# Harness package initialization
