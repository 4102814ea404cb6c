"""Adjacency spectral embedding, mean-square-error clustering and the bounds that certify them."""
