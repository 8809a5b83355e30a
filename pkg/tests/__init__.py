"""
Test suite for net-homophily.

Covers the combinatorial helpers, the graph model, the closed-form moments
against the enumeration and sampling oracles, input preprocessing, report
serialization, charts and the command line.
"""
