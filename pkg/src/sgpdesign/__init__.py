"""Communication graph design and simulation for stochastic gradient push."""
