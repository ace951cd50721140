"""Operator-valued market model with bid-offer spread jumps.

Subpackages:
    algebra   -- normal-ordered operator polynomials, quantum Ito table
    opsyntax  -- textual operator syntax (parser and printer)
    models    -- evolution-operator presets (classical, extended, spread)
    market    -- direct-sum Gaussian wavepacket market states
    gaussian  -- state-dependent variance of the extended Gaussian model
    spread    -- non-Gaussian spread-jump law: moments, CF, lattice, sampler
    pricing   -- martingale pricing, arbitrage checks, implied-vol smiles
    config    -- scenario configuration files
    validate  -- cross-check suite behind the `validate` CLI command
    cli       -- command-line front end
"""

__version__ = "0.1.0"
