"""Frozen expected values.

Each constant was computed once with the independent code in
``reference.py`` (or by hand where noted) and pasted here; the tests compare
the package against these literals, and ``test_reference.py`` re-derives
them so a drift in either place is caught.
"""

# coding
PAIR_OF_K_K = 81_058_266            # encode(PAIR K K), the least pair code cp(0, 0)
NUMERAL_CODES = (55, 67, 80, 94)    # encode(NUM(0..3))
BIG_NUMERAL_CODE = 1_000_000_013    # unpair gives tag 6267 > 11
IDENTITY_CODE = 5_032_366           # encode(S K K)
PRED_CODE = 21

# evaluation
FIX_K_ONE_AT_FUEL_10 = ("defined", "(FIX K)")
C_ON_1_2_3 = "stuck"                # NUM(1) NUM(3) NUM(2) has a numeral in head position

# j_U for U = {0:{1,2}, 1:{2}} on B = 3, at p = {2}
J_EXAMPLE_AT_2 = 0b010
# U = {0:{1}, 1:{0}} on B = 3: j_{U∘U} and j_U∘j_U
SWAP_J_SQUARED = (0, 1, 2, 3, 0, 1, 2, 3)

# realizer searches (least codes)
LEAST_EQ00 = 55                      # NUM(0)
LEAST_IMP_EQ00 = 21                  # PRED sends NUM(0) to NUM(0)
LEAST_IMP_TV12 = 93                  # K S sends both K#1 and S to S

# degree poset of the six-entry catalog under em (covering edges, lower -> upper)
EM_EDGES = (
    ("CHOICE2", "ID2"),
    ("EMPTY", "CHOICE2"),
    ("ID2", "SECRETBIT"),
    ("SECRETBIT", "FALSE1"),
)
EM_DEGREES = (
    ("CHOICE2", ("CHOICE2",)),
    ("EMPTY", ("EMPTY",)),
    ("FALSE1", ("FALSE1",)),
    ("ID2", ("ID2", "ID2_JOIN_CHOICE2")),
    ("SECRETBIT", ("SECRETBIT",)),
)
