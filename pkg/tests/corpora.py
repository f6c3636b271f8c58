"""Source-text corpora shared by several test modules."""

from __future__ import annotations

PEANO_TEMPLATE = """
interface_sig PEANO = {{
  type N{expose}
  val zero : N
  val succ : N -> N
  val toInt : N -> int
}}

component_sig NAT = {{
  interface P : PEANO
}}

component NatComp () : NAT = {{
  interface P = {{
    type N = int
    val zero = 0
    fun succ n = n + 1
    fun toInt n = n
  }}
}}

val A = NatComp ()
{client}
"""

# Each client treats a PEANO.N as the int it is implemented by.
REPRESENTATION_CLIENTS = [
    "val _ = print (int_to_string (3 + A.P.zero))",
    "val _ = print (int_to_string (A.P.toInt 5))",
    "val n : int = A.P.zero",
    "val _ = print (int_to_string (A.P.succ A.P.zero * 2))",
    "fun f (x : int) = x + 1\nval _ = print (int_to_string (f A.P.zero))",
    "val _ = print (if A.P.zero = 0 then \"zero\" else \"other\")",
    "val xs = [1, A.P.zero]",
    "val _ = print (int_to_string A.P.zero)",
    "val B = NatComp ()\nval _ = print (int_to_string (A.P.toInt (B.P.succ B.P.zero)))",
]


def peano(client: str, exposed: bool) -> str:
    return PEANO_TEMPLATE.format(expose=" = int" if exposed else "", client=client)
