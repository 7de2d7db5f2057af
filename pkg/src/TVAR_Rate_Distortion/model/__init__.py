"""TVAR model definition, inverse-spectrum surface and simulation."""
