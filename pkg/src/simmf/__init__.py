"""Meta-path similarity over heterogeneous networks and SimMF dual-regularized matrix factorization."""
