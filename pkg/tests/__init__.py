# Test suite for the pepa-psni toolkit
