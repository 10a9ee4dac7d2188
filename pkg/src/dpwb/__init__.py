"""Workbench for a three-sorted logic of valued fields: truncated models of
Q_p and F_p((t)), motivic (exponential) functions, integration against the
canonical measure, cross-characteristic transfer experiments, and
dominant-term bound certificates for q-power sums on Z^r."""

__version__ = "0.1.0"

from .errors import (BudgetError, CharacterPrecisionError, DomainError,
                     FormulaSyntaxError, GraphWitnessError, InputError,
                     OrdOfZeroError, PrecisionError, ResourceError, SortError,
                     UnresolvedError, WorkbenchError)
from .syntax import (Formula, Signature, Sort, Term, format_formula, format_term,
                     free_vars, parse_formula, parse_formula_file, parse_term,
                     typecheck)
from .localfield import (FieldDesc, RFElem, VFElem, embed_constant, enumerate_ball,
                         fpt_from_coeffs, make_truncated, parse_element_literal,
                         qp_from_fraction, vf_ac, vf_add, vf_arith, vf_inv, vf_mul,
                         vf_neg, vf_ord, vf_sub, vf_zero)
from .presburger import (PresburgerSet, Progression1D, normalize_1d, pres_eval,
                         presburger_qe, set_to_formula)
from .semantics import (Assignment, DefinableSet, SearchBox, TruthVal,
                        count_rf_fiber, enumerate_set, eval_formula, find_witnesses)
from .rootsum import RootSum
from .motivic import (ExpTerm, MotivicExpFunction, MotivicFunction, MotivicTerm,
                      ZFunction, canonical_character, eval_exp, eval_motivic,
                      parse_motivic_file, residue_character)
from .integrate import (BoundednessReport, IntegrabilityRefusal,
                        IntegrabilityVerdict, IntegralResult, MeasureSpec,
                        check_bounded, check_integrable, full_domain, integrate,
                        integrate_out, vf_ring_domain)
from .transfer import (FitResult, StatementSpec, TransferReport,
                       parse_statement_file, transfer_experiment,
                       uniform_bound_fit)
from .zsums import (BoundCertificate, LinForm, TermSum, TsTerm, parse_tsum,
                    tsum_bound, tsum_eval, tsum_merge, tsum_violations)
