"""Vocabulary for the synthetic release corpus.

Plain concrete nouns (candidates are filtered in the generator against the
live lexicons: must be content words, default-NOUN under POS-lite, and their
own lemma) plus surname-like tokens used as named entities.
"""

NOUN_CANDIDATES = """
anchorage apron arbor archway attic auditorium aviary awning backlot balcony
ballroom banister barge barn barracks basin bazaar beacon bedrock belfry
bench billboard blacksmith boardwalk boiler bollard bookcase boulevard
breakwater brewery bridge brook bunker buoy bureau cabin cable caboose
cairn campus canal canopy canteen canyon carousel cart cascade catacomb
causeway cellar chapel chimney cistern clocktower cloister cobblestone
colonnade compost conveyor coop corral corridor cottage courtyard crane
crater creek crypt culvert dairy dam depot derrick dike dinghy dock
doorway dormitory drawbridge driveway dugout dune embankment engine
escalator estuary fairground ferry fieldstone firehouse fjord floodgate
flume foothill footpath forge fountain foyer freighter fuselage gable
gangway garret gazebo geyser girder glacier glade granary grotto grove
gully gymnasium hallway hamlet hangar harbor hayloft headland hearth
hedge hillside hollow homestead hull hutch iceberg inlet isle jetty
keel kiln knoll lagoon lakefront lantern lathe ledge levee lighthouse
lintel lobby locomotive lodge loft lumberyard marina marketplace marsh
mast meadow mesa mill mineshaft moat mooring mound mudflat newsroom
nook oasis obelisk orchard outpost overlook overpass paddock pagoda
palisade pantry parapet parlor pasture patio pavilion pediment peninsula
pier pillar pinnacle plank plateau plaza pond porch portico prairie
promenade pulley quarry quay rafter rampart ranch ravine reef reservoir
ridge riverbank roadhouse rookery rotunda rowboat runway sawmill
scaffold schooner seawall shed shoal shipyard shoreline silo skylight
sledge sluice smokestack spillway spire stable staircase stairwell
steeple stockade storeroom streambed summit sundial tarmac tavern
terrace thicket tollbooth toolshed tower trawler trellis trestle
tributary tugboat tundra turbine turret underpass upland vault veranda
viaduct vineyard walkway warehouse waterfront weathervane wharf windmill
woodshed workshop anvil ballast bellows bobbin bracket bramble brazier
bristle bucket cauldron chisel cinder clapboard cog compass crucible
cupola dowel dynamo easel ember eyelet ferrule flagon flask flint
fulcrum funnel gasket gavel gimbal gong griddle grindstone gusset
hinge hoist hourglass ingot jar jug keg kettle ladle lockbox loom
mallet mantel mortar nozzle oar padlock pail pedal pendulum pestle
piston pitcher plinth plow pulpit quill ratchet rivet rudder satchel
scabbard shackle shovel sickle skillet spigot spindle sprocket stopwatch
strut stylus sundries tankard tassel thimble tong torch trowel trough
trunk urn vane vise wagon washer wheelbarrow whetstone winch windlass
yoke zephyr abacus almanac amulet atlas beaker bugle candelabra carafe
chalice decanter flagpole gargoyle goblet harpoon helm hymnal inkwell
journal kaleidoscope locket manifold manuscript medallion monocle mural
notebook parchment pennant phonograph placard postcard prism quiver
regalia scepter scroll sextant signet slate spyglass stencil tapestry
telescope tome totem triptych trophy tuning vellum vignette billfold
bandolier bassinet blotter bonnet breeches brooch buckle burlap calico
cummerbund doublet epaulet flannel gaiter garland haberdashery jerkin
khaki lapel moccasin muffler pantaloon parka pinafore poncho sash
smock sombrero suspender tunic twill visor waistcoat
""".split()

NAME_CANDIDATES = """
Alvarez Barnett Calloway Delgado Ellington Farrow Galloway Hargrove
Iverson Jansson Kendrick Lachlan Mercado Navarro Okafor Pemberton
Quintana Rosales Sandoval Thackeray Underwood Valdez Whitfield Xiong
Yarborough Zimmer Ashford Bellamy Crowley Donovan Everhart Fitzroy
Granger Holloway Ingram Jericho Kingsley Lockwood Mansfield Northrop
Oakley Prescott Quimby Radcliffe Sinclair Tremont Upton Vance Winslow
Yates Abernathy Birchwood Caldwell Dunmore Eastman Fairbanks Garfield
Hawthorne Irving Jefferson Kirkland Langford Merriweather Norwood
Ormsby Pickett Quarles Ridgeway Stanton Thornton Vandermeer Wentworth
""".split()
