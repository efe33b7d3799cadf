# Model front end, semantics, Markov chain and security analysis
