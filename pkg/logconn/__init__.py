# Logarithmic connections on the projective line: exact engine and job runner
