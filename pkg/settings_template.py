debug = False

# Default seed for every Monte-Carlo operation. The LIECTL_SEED environment
# variable overrides it when --seed is not given on the command line.
seed = 42

# Relative singular-value cutoff for rank decisions and Gram-Schmidt drops.
rank_tol = 1e-9

# Bracket closure worklist
closure_max_iterations = 64
closure_check_tol = 1e-8

# Cartan pair verification
cartan_tol = 1e-12
membership_tol = 1e-10

# KAK decompositions
kak_su2_tol = 1e-10
kak_sun_tol = 1e-8
kak_sun_max_n = 8
kak_sun_retries = 8

# Kostant projection / majorization
kostant_tol = 1e-9

# Geodesics
geodesic_steps = 1000
geodesic_horizon = 3.0
horizontal_tol = 1e-3

# Control simulation and the minimum-time search
simulate_dt = 0.01
unbounded_sample_amplitude = 10.0
mintime_initial_horizon = 1.0
mintime_max_horizon = 64.0
mintime_bisection_steps = 10
mintime_segments = 4
mintime_candidates = 24
mintime_descent_rounds = 40
workers = 1

# Step of the planar drift example integrator
r2_dt = 1e-3

# Literal-vs-oracle verdict threshold for the discrepancy report
formula_match_tol = 1e-9
