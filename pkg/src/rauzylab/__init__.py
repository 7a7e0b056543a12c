"""S-adic sequences, generalized continued fractions and Rauzy fractals."""
from .words import Alphabet, Word, abelianize, balance_check, complexity, factors
from .substitution import Substitution, builtin_family, fibonacci_variant, tribonacci
from .sadic import DirectiveSequence, limit_sequences, parse_directive

__all__ = [
    "Alphabet", "Word", "abelianize", "balance_check", "complexity", "factors",
    "Substitution", "builtin_family", "fibonacci_variant", "tribonacci",
    "DirectiveSequence", "limit_sequences", "parse_directive",
]
__version__ = "0.1.0"
