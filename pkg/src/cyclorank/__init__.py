"""Rank constancy criteria for elliptic curves in cyclotomic Z_p-towers."""
