# Define the new task plan
task_plan = [
# Approach the glass with yellowish liquid first with a moderate speed
# and obstacle clearance
(0, 'approach', ('glass with yellowish liquid', 0.5, 0.03, 'top')),

# Pick up the glass with yellowish liquid at a moderate speed ensuring a top grasp
(1, 'pick', ('glass with yellowish liquid', 0.5, 0.03, 'top')),

# Drop the glass with yellowish liquid in the large red trash can
(2, 'drop', ('large red trash can', 0.5, 0.03)),

# Now approach the half-eaten apple with moderate speed and obstacle clearance
(3, 'approach', ('half-eaten apple', 0.5, 0.03, 'side')),

# Pick up the half-eaten apple at a moderate speed ensuring a side grasp
(4, 'pick', ('half-eaten apple', 0.5, 0.03, 'side')),

# Drop the half-eaten apple in the large red trash can
(5, 'drop', ('large red trash can', 0.5, 0.03))
]
