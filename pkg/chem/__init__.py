# Chem package initialization
