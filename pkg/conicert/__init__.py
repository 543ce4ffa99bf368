# Conicert - conic bundles over P^1 of a finite field
# Residues, non-split loci, cover synthesis and certificates
__version__ = "1.0.0"
