"""Simple script to verify imports and one small Sinkhorn solve without pytest"""
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), "src"))

print("Python version:", sys.version)
print("Current directory:", os.getcwd())
print("\nTesting imports...")

try:
    from measures import build_grid_measure, gaussian_model
    print("✅ measures")
except Exception as e:
    print(f"❌ measures: {e}")
    sys.exit(1)

try:
    from costs.cost_models import HalfSquaredEuclidean
    print("✅ costs")
except Exception as e:
    print(f"❌ costs: {e}")
    sys.exit(1)

try:
    from transport import marginal_error, solve_reference, w2_squared
    print("✅ transport")
except Exception as e:
    print(f"❌ transport: {e}")
    sys.exit(1)

try:
    from theory.rates import rate_catalog
    print("✅ theory")
except Exception as e:
    print(f"❌ theory: {e}")
    sys.exit(1)

print("\nSolving a small 1-D problem...")
rho = build_grid_measure(gaussian_model(1.0, 1), [[-3.0, 3.0]], 21)
nu = build_grid_measure(gaussian_model(2.0, 1, [0.5]), [[-2.5, 3.5]], 21)
state = solve_reference(rho, nu, HalfSquaredEuclidean(), 0.5)
print(f"converged={state.converged} marginal error={marginal_error(state):.2e}")
print(f"W2^2={w2_squared(rho, nu)[0]:.6f}")
print(rate_catalog("log-concave", 1.0, 0.5, sigma_norm=1.0, alpha=1.0).describe())

print("\n✅ All checks complete!")
